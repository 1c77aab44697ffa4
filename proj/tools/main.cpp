#include "cli.hpp"

int main(int argc, char** argv) { return egpmda::cli::dispatch(argc, argv); }
