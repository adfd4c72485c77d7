#include <iostream>

#include "tnperm/cli.hpp"

int main(int argc, char** argv) { return tnperm::run_cli(argc, argv, std::cout, std::cerr); }
