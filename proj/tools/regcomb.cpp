#include "regcomb/cli.hpp"

int main(int argc, char** argv) { return regcomb::cli::run(argc, argv, std::cout, std::cerr); }
