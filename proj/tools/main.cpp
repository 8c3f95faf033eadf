#include "cli.hpp"

int main(int argc, char** argv) { return hwlab::cli::run(argc, argv); }
