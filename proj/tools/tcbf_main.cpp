#include "tcbf/cli.hpp"

int main(int argc, char** argv) { return tcbf::cli::run(argc, argv); }
