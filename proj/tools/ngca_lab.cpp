#include "ngca/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return ngca::cli::run_command(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
