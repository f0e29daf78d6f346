#include "tlnet/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return tlnet::run_cli(argc, argv, std::cout, std::cerr); }
