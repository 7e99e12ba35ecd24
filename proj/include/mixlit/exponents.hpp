#pragma once

#include <mixlit/exponents/estimators.hpp>
