#include "rtnet/model/rtnet.hpp"
#include "rtnet/model/trainer.hpp"
template class rtnet::model::RtNetModel<float>;
template class rtnet::model::RtNetModel<double>;
