#include "densitrace/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return densitrace::cli_main(argc, argv, std::cout, std::cerr); }
