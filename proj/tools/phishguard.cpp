#include <iostream>
#include <string>
#include <vector>

#include <unistd.h>

#include "phishguard/cli.hpp"

int main(int argc, char** argv)
{
    std::ios::sync_with_stdio(false);
    const std::vector<std::string> args(argv, argv + argc);
    return phishguard::run_cli(args, {std::cout, std::cerr, std::cin, static_cast<bool>(isatty(STDOUT_FILENO))});
}
