#include <mixlit/cli/dispatch.hpp>

int main(int argc, char** argv) { return mixlit::cli::dispatch(argc, argv); }
