#include <iostream>

#include "fpt/cli.hpp"

int main(int argc, char** argv) { return fpt::run_main(argc, argv, std::cout, std::cerr); }
