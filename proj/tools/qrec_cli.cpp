#include <iostream>

#include "qrec/cli.hpp"

int main(int argc, char** argv) { return qrec::cli::run(argc, argv, std::cout, std::cerr); }
