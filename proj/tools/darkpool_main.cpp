#include <iostream>

#include "darkpool/cli.hpp"

int main(int argc, char** argv) { return darkpool::run_cli(argc, argv, std::cout, std::cerr); }
