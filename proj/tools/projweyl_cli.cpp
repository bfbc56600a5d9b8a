#include "projweyl/cli.hpp"

int main(int argc, char** argv) { return projweyl::cli::run(argc, argv); }
