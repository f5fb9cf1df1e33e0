#include <iostream>

#include "execsim/cli/commands.hpp"

int main(int argc, char** argv) {
    return execsim::cli::run_cli(argc, argv, std::cout, std::cerr);
}
