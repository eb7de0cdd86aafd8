#include <vector>

#include "spectralseq/cli.hpp"

int main(int argc, char** argv) {
    return spectralseq::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
