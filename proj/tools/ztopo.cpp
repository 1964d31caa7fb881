#include "ztopo/cli.hpp"

int main(int argc, char** argv) { return ztopo::cli::main(argc, argv); }
