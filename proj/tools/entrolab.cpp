#include "entrolab/cli.hpp"

int main(int argc, char** argv) { return entrolab::cli::run(argc, argv); }
