#include "cli.hpp"

int main(int argc, char** argv) { return scnn::cli::run(argc, argv); }
