#include "spahr/dlr.hpp"

namespace spahr {

template class CayleyRetraction<double>;
template struct ReducedState<double>;

}  // namespace spahr
