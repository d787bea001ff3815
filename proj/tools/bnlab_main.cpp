// Command-line front end; subcommands are wired up in bnlab/cli.hpp.
#include <cstdio>

int main() {
    std::puts("bnlab: command-line interface not assembled yet");
    return 1;
}
