#include <iostream>

#include "stmcheck/cli.hpp"

int main(int argc, char** argv) { return stmcheck::run_cli(argc, argv, std::cout, std::cerr); }
