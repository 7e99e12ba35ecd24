#pragma once

#include <mixlit/functions/approx_function.hpp>
#include <mixlit/functions/weight_function.hpp>
