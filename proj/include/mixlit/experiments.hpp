#pragma once

#include <mixlit/experiments/experiment.hpp>
#include <mixlit/experiments/run_files.hpp>
#include <mixlit/experiments/seeds.hpp>
