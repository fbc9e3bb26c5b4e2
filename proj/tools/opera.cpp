#include "opera/cli.hpp"

int main(int argc, char** argv) { return opera::cli::run(argc, argv); }
