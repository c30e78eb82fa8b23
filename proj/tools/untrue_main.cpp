#include <iostream>

#include "untrue/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return untrue::run_cli(args, std::cout, std::cerr);
}
