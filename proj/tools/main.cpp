#include <iostream>

#include "neurotraj/cli.hpp"

int main(int argc, char** argv) { return neurotraj::run_cli(argc, argv, std::cout, std::cerr); }
