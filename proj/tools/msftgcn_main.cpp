#include <iostream>

#include "msftgcn/cli.hpp"

int main(int argc, char** argv) { return msftgcn::cli_main(argc, argv, std::cout, std::cerr); }
