#include "meshpde/cli.hpp"

int main(int argc, char** argv) {
    return meshpde::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
