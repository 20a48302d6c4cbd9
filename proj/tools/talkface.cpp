#include <iostream>

#include "talkface/cli.hpp"

int main(int argc, char** argv)
{
    return talkface::cli::run(argc, argv, std::cout, std::cerr);
}
