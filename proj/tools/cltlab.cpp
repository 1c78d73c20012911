#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "cltlab/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return cltlab::cli::main_entry(args, std::cout, std::cerr, std::getenv(cltlab::cli::kSeedEnv));
}
