#include "absc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return absc::run_cli(argc, argv, std::cout, std::cerr); }
