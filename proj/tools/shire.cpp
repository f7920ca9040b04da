#include <iostream>

#include "shire/cli/app.hpp"

int main(int argc, char** argv) { return shire::cli::run(argc, argv, std::cout, std::cerr); }
