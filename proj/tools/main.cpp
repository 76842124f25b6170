#include <iostream>

#include "treecycles/cli.hpp"

int main(int argc, char** argv) { return treecycles::run_cli(argc, argv, std::cout, std::cerr); }
