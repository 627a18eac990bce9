#include "grucnn/cli.hpp"

int main(int argc, char** argv) { return grucnn::cli::run(argc, argv); }
