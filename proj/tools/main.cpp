#include "loopviro_cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return loopviro::cli::run_command(args);
}
