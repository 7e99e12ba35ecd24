#pragma once

#include <mixlit/core/phi_sum.hpp>
#include <mixlit/core/prime_set.hpp>
#include <mixlit/core/sieve.hpp>
#include <mixlit/core/valuation.hpp>
#include <mixlit/core/valuation_patterns.hpp>
