#include "cascadelab/cli.hpp"

int main(int argc, char** argv) {
    return cascadelab::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
