#pragma once

#include <mixlit/realfield/certified_real.hpp>
#include <mixlit/realfield/continued_fraction.hpp>
#include <mixlit/realfield/distance.hpp>
#include <mixlit/realfield/dyadic_interval.hpp>
#include <mixlit/realfield/fixed_window.hpp>
#include <mixlit/realfield/parse.hpp>
