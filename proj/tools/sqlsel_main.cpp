#include <iostream>

#include "sqlsel/cli.hpp"

int main(int argc, char** argv) { return sqlsel::run_cli(argc, argv, std::cout, std::cerr); }
