#include <iostream>
#include <string>
#include <vector>

#include "fairtest/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return fairtest::run_cli(args, std::cout, std::cerr);
}
