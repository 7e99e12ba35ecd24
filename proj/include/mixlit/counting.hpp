#pragma once

#include <mixlit/counting/counters.hpp>
#include <mixlit/counting/liminf.hpp>
