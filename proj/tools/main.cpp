#include <iostream>
#include <string>
#include <vector>

#include "cpsmine/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cpsmine::cli::run(args, std::cout, std::cerr);
}
