#include "commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return mxcd::cli::run(argc, argv, std::cout, std::cerr); }
