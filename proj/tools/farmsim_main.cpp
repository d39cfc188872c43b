#include <iostream>

#include "farmsim/cli.hpp"

int main(int argc, char** argv) {
    return farmsim::cli::run_cli(argc, argv, std::cout, std::cerr);
}
