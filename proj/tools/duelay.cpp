#include "duelay/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return duelay::cli_main(argc, argv, std::cout, std::cerr); }
