#include <string>
#include <vector>

#include "qtrabi/cli.hpp"

int main(int argc, char** argv) {
    return qtrabi::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
