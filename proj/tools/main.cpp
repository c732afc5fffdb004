#include "commands.hpp"

int main(int argc, char** argv) { return mick::cli::run(argc, argv); }
