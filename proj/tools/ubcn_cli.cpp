#include "ubcn/cli/commands.hpp"

int main(int argc, char** argv) { return ubcn::cli::run(argc, argv); }
