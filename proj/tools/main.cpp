#include <iostream>

#include "chyp/cli.hpp"

int main(int argc, char** argv) {
    return chyp::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
