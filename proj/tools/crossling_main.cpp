#include <iostream>

#include "crossling/cli/app.hpp"

int main(int argc, char** argv) {
    return crossling::cli::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
