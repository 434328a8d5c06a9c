#include <string>
#include <vector>

#include "hyctrl/cli.hpp"

int main(int argc, char** argv) {
    return hyctrl::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
