#include "gssl/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return gssl::run_cli(argc, argv, std::cout, std::cerr); }
