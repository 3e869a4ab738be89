#include "nashseek/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return nashseek::cli_dispatch(argc, argv, std::cout, std::cerr); }
