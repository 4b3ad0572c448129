#include <vector>

#include "vmin/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return vmin::run_cli(args);
}
