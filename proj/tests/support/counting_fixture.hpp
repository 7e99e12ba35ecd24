#pragma once

// The ten reals of the counting oracle fixture, each as a library
// constructor and as the oracle's independent rebuild, plus the five
// counter configurations compared at N = 10^4.

#include "../oracle/brute_force.hpp"

#include <mixlit/counting.hpp>
#include <mixlit/realfield/parse.hpp>

#include <string>
#include <vector>

namespace fixture {

struct NamedReal {
    std::string text;
    oracle::Real reference;
};

inline std::vector<NamedReal> counting_reals() {
    return {
        {"rat:22/7", oracle::rational(22, 7)},
        {"rat:3/8", oracle::rational(3, 8)},
        {"sqrt:2", oracle::surd(0, 1, 2, 1)},
        {"sqrt:3", oracle::surd(0, 1, 3, 1)},
        {"golden", oracle::surd(1, 1, 5, 2)},
        {"surd:1,1,7,3", oracle::surd(1, 1, 7, 3)},
        {"gap:p=2,table=2;6;18;54;162", oracle::gap_table(2, {2, 6, 18, 54, 162})},
        {"gap:p=3,table=1;3;8;20;50;125;310", oracle::gap_table(3, {1, 3, 8, 20, 50, 125, 310})},
        {"rand:seed=1", oracle::random_digits(1)},
        {"rand:seed=0xDEADBEEF", oracle::random_digits(0xDEADBEEF)},
    };
}

struct CounterCase {
    mixlit::CounterKind kind;
    std::string psi_text;
    std::vector<unsigned long> primes;
    oracle::Psi psi;
    unsigned reals;  // consecutive fixture entries per input
    oracle::Form form;
    bool reduced;
};

inline std::vector<CounterCase> counter_cases() {
    using mixlit::CounterKind;
    return {
        {CounterKind::Mixed, "pow:c=1,a=1,b=1", {2, 3}, {1, 1, 1, {2, 3}, {}}, 1, oracle::Form::Product, false},
        {CounterKind::Reduced, "pow:c=1,a=1,b=0", {2}, {1, 1, 0, {2}, {}}, 1, oracle::Form::Max, true},
        {CounterKind::Gallagher, "pow:c=1,a=1,b=0", {}, {1, 1, 0, {}, {}}, 2, oracle::Form::Product, false},
        {CounterKind::Simultaneous, "pow:c=0.5,a=0.5,b=1", {3}, {0.5, 0.5, 1, {3}, {}}, 2, oracle::Form::Max, false},
        {CounterKind::Multiplicative, "pow:c=1,a=1,b=1", {2}, {1, 1, 1, {2}, {}}, 2, oracle::Form::Product, false},
    };
}

/// Runs the library counter of `c` on the fixture reals starting at `first`.
inline mixlit::CountResult library_count(const CounterCase& c, const std::vector<NamedReal>& reals, std::size_t first,
                                         std::uint64_t N, std::size_t workers = 1) {
    using namespace mixlit;
    std::vector<CertifiedReal> xs;
    for (unsigned j = 0; j < c.reals; ++j) xs.push_back(parse_real(reals[(first + j) % reals.size()].text));
    const ApproxFunction psi = parse_psi(c.psi_text);
    const PrimeSet ps(std::vector<std::uint64_t>(c.primes.begin(), c.primes.end()));
    CountOptions opt;
    opt.workers = workers;
    switch (c.kind) {
        case CounterKind::Mixed: return count_mixed(xs[0], N, psi, {}, ps, opt);
        case CounterKind::Reduced: return count_reduced(xs[0], N, psi, {}, ps, opt);
        case CounterKind::Gallagher: return count_gallagher_pair(xs[0], xs[1], N, psi, opt);
        case CounterKind::Simultaneous: return count_simultaneous(xs, N, psi, {}, ps, false, opt);
        case CounterKind::Multiplicative: return count_multiplicative(xs, N, psi, {}, ps, opt);
    }
    return {};
}

inline std::vector<oracle::Real> oracle_inputs(const CounterCase& c, const std::vector<NamedReal>& reals,
                                               std::size_t first) {
    std::vector<oracle::Real> out;
    for (unsigned j = 0; j < c.reals; ++j) out.push_back(reals[(first + j) % reals.size()].reference);
    return out;
}

} // namespace fixture
