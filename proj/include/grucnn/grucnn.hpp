#pragma once

#include "grucnn/common.hpp"
#include "grucnn/tensor.hpp"
#include "grucnn/ops.hpp"
#include "grucnn/dsp/fft.hpp"
#include "grucnn/dsp/wav.hpp"
#include "grucnn/dsp/spectral.hpp"
#include "grucnn/dsp/mix.hpp"
#include "grucnn/model/cells.hpp"
#include "grucnn/model/spec.hpp"
#include "grucnn/model/model.hpp"
#include "grucnn/model/checkpoint.hpp"
#include "grucnn/train/manifest.hpp"
#include "grucnn/train/loss.hpp"
#include "grucnn/train/adam.hpp"
#include "grucnn/train/trainer.hpp"
#include "grucnn/metrics/ssnr.hpp"
#include "grucnn/metrics/stoi.hpp"
#include "grucnn/metrics/evaluate.hpp"
