#include <iostream>

#include "hetqa/cli.hpp"

int main(int argc, char** argv) { return hetqa::dispatch(argc, argv, std::cout, std::cerr); }
