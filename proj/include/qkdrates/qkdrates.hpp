#pragma once

#include <qkdrates/asymptotic.hpp>
#include <qkdrates/channel_model.hpp>
#include <qkdrates/entropy.hpp>
#include <qkdrates/errors.hpp>
#include <qkdrates/finite_key.hpp>
#include <qkdrates/format.hpp>
#include <qkdrates/image.hpp>
#include <qkdrates/linalg.hpp>
#include <qkdrates/mode_render.hpp>
#include <qkdrates/normal_quantile.hpp>
#include <qkdrates/optimize.hpp>
#include <qkdrates/parallel.hpp>
#include <qkdrates/pauli_mub.hpp>
#include <qkdrates/simulator.hpp>
#include <qkdrates/svg_plot.hpp>
