#ifndef TWISTFORM_TWISTFORM_HPP
#define TWISTFORM_TWISTFORM_HPP

#include "twistform/degeneration.hpp"
#include "twistform/error.hpp"
#include "twistform/fullrank.hpp"
#include "twistform/geometry.hpp"
#include "twistform/gf_tower.hpp"
#include "twistform/json_io.hpp"
#include "twistform/twisted_linear.hpp"
#include "twistform/verify.hpp"

#endif  // TWISTFORM_TWISTFORM_HPP
