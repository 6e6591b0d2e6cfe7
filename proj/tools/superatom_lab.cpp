#include <string>
#include <vector>

#include "superatom/cli.hpp"

int main(int argc, char** argv) {
    return superatom::cli::run(std::vector<std::string>(argv, argv + argc));
}
