#include "rtnet/cli/cli.hpp"

int main(int argc, char** argv) { return rtnet::cli::run(argc, argv); }
