#include <iostream>

#include "sapgp/cli.hpp"

int main(int argc, char** argv) { return sapgp::run_cli(argc, argv, std::cout, std::cerr); }
