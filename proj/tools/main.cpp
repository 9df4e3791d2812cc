#include <iostream>

#include "modpot/cli.hpp"

int main(int argc, char** argv) { return modpot::run_cli(argc, argv, std::cout, std::cerr); }
