#include <iostream>

#include "darkspace/cli/runner.hpp"

int main(int argc, char** argv) {
    return darkspace::cli::run(argc, argv, std::cout, std::cerr);
}
