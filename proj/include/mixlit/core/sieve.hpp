#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixlit {

/// Euler phi, Moebius mu and smallest prime factor for every n <= limit,
/// built once by a linear sieve and immutable afterwards. Queries above the
/// limit are errors, never on-demand factorizations.
class SieveTable {
public:
    static constexpr std::array<char, 5> kMagic = {'M', 'L', 'S', 'V', '1'};

    explicit SieveTable(std::uint64_t limit) : limit_(limit) {
        if (limit >= std::numeric_limits<std::uint32_t>::max()) {
            throw std::invalid_argument("SieveTable: limit must be below 2^32");
        }
        const std::size_t size = static_cast<std::size_t>(limit) + 1;
        phi_.assign(size, 0);
        mu_.assign(size, 0);
        spf_.assign(size, 0);
        if (limit >= 1) {
            phi_[1] = 1;
            mu_[1] = 1;
            spf_[1] = 1;
        }
        std::vector<std::uint32_t> primes;
        for (std::uint64_t i = 2; i <= limit; ++i) {
            if (spf_[i] == 0) {
                spf_[i] = static_cast<std::uint32_t>(i);
                phi_[i] = static_cast<std::uint32_t>(i - 1);
                mu_[i] = -1;
                primes.push_back(static_cast<std::uint32_t>(i));
            }
            for (std::uint32_t p : primes) {
                const std::uint64_t ip = i * p;
                if (p > spf_[i] || ip > limit) break;
                spf_[ip] = p;
                if (i % p == 0) {
                    phi_[ip] = phi_[i] * p;
                    mu_[ip] = 0;
                } else {
                    phi_[ip] = phi_[i] * (p - 1);
                    mu_[ip] = static_cast<std::int8_t>(-mu_[i]);
                }
            }
        }
    }

    std::uint64_t limit() const { return limit_; }

    std::uint32_t phi(std::uint64_t n) const { return phi_[check(n)]; }
    int mu(std::uint64_t n) const { return mu_[check(n)]; }
    std::uint32_t smallest_prime_factor(std::uint64_t n) const { return spf_[check(n)]; }

    /// Unchecked views for hot loops; index 0 is unused.
    const std::vector<std::uint32_t>& phi_values() const { return phi_; }
    const std::vector<std::int8_t>& mu_values() const { return mu_; }

    /// Binary cache: "MLSV1", little-endian u64 limit, then phi (u32),
    /// mu (i8) and smallest prime factor (u32) for n = 0..limit.
    void save(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write sieve cache " + path.string());
        out.write(kMagic.data(), kMagic.size());
        write_le(out, limit_);
        for (auto v : phi_) write_le(out, v);
        out.write(reinterpret_cast<const char*>(mu_.data()), static_cast<std::streamsize>(mu_.size()));
        for (auto v : spf_) write_le(out, v);
        if (!out) throw std::runtime_error("short write to sieve cache " + path.string());
    }

    static SieveTable load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open sieve cache " + path.string());
        std::array<char, 5> magic{};
        in.read(magic.data(), magic.size());
        if (!in || magic != kMagic) throw std::runtime_error("bad sieve cache magic in " + path.string());
        SieveTable t;
        t.limit_ = read_le<std::uint64_t>(in);
        if (t.limit_ >= std::numeric_limits<std::uint32_t>::max()) throw std::runtime_error("bad sieve cache limit");
        const std::size_t size = static_cast<std::size_t>(t.limit_) + 1;
        t.phi_.resize(size);
        t.mu_.resize(size);
        t.spf_.resize(size);
        for (auto& v : t.phi_) v = read_le<std::uint32_t>(in);
        in.read(reinterpret_cast<char*>(t.mu_.data()), static_cast<std::streamsize>(size));
        for (auto& v : t.spf_) v = read_le<std::uint32_t>(in);
        if (!in) throw std::runtime_error("truncated sieve cache " + path.string());
        return t;
    }

    /// Loads from $MIXLIT_SIEVE_CACHE when it holds a large enough table,
    /// otherwise builds one and (if the variable is set) refreshes the cache.
    static SieveTable cached(std::uint64_t limit) {
        const char* env = std::getenv("MIXLIT_SIEVE_CACHE");
        if (env == nullptr || *env == '\0') return SieveTable(limit);
        const std::filesystem::path path(env);
        std::error_code ec;
        if (std::filesystem::exists(path, ec)) {
            try {
                SieveTable t = load(path);
                if (t.limit() >= limit) return t;
            } catch (const std::exception&) {
                // stale or foreign file; rebuilt below
            }
        }
        SieveTable t(limit);
        try {
            t.save(path);
        } catch (const std::exception&) {
        }
        return t;
    }

private:
    SieveTable() = default;

    std::size_t check(std::uint64_t n) const {
        if (n == 0 || n > limit_) {
            throw std::out_of_range("SieveTable: n=" + std::to_string(n) + " outside [1, " + std::to_string(limit_) + "]");
        }
        return static_cast<std::size_t>(n);
    }

    template <class T>
    static void write_le(std::ostream& out, T v) {
        unsigned char buf[sizeof(T)];
        for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
        out.write(reinterpret_cast<const char*>(buf), sizeof(T));
    }

    template <class T>
    static T read_le(std::istream& in) {
        unsigned char buf[sizeof(T)] = {};
        in.read(reinterpret_cast<char*>(buf), sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[i]) << (8 * i);
        return v;
    }

    std::uint64_t limit_ = 0;
    std::vector<std::uint32_t> phi_;
    std::vector<std::int8_t> mu_;
    std::vector<std::uint32_t> spf_;
};

} // namespace mixlit
