#include "talkface/parallel.hpp"

#include <omp.h>

namespace talkface {

int max_threads()
{
    return omp_get_max_threads();
}

}  // namespace talkface
