#pragma once

#include <mixlit/series/classify.hpp>
#include <mixlit/series/exact_sum.hpp>
#include <mixlit/series/partial_sums.hpp>
