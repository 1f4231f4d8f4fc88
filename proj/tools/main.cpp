#include "doqkd/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return doqkd::run_cli(argc, argv, std::cout, std::cerr); }
