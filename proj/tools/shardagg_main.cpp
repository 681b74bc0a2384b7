#include <iostream>

#include "shardagg/cli/commands.hpp"

int main(int argc, char** argv) { return shardagg::cli::run(argc, argv, std::cout, std::cerr); }
