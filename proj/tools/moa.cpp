#include <iostream>

#include "moa/interface/cli.hpp"

int main(int argc, char** argv) { return moa::cli_main(argc, argv, std::cout, std::cerr); }
