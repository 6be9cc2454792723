#include <iostream>
#include <string>
#include <vector>

#include "matchstat/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return matchstat::cli::run(args, std::cout, std::cerr);
}
