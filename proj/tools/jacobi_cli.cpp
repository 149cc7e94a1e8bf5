#include <string>
#include <vector>

#include "jacobi/cli.hpp"

int main(int argc, char** argv) {
    return jacobi::cli::main_entry(std::vector<std::string>(argv + 1, argv + argc));
}
