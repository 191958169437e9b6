#pragma once

#include <string>

#include "doctest.h"
#include "lmf/errors.hpp"

#define CHECK_LMF_CODE(expr, expected)                                   \
  do {                                                                   \
    bool thrown_ = false;                                                \
    try {                                                                \
      (void)(expr);                                                      \
    } catch (const lmf::LmfError& e_) {                                  \
      thrown_ = true;                                                    \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());                 \
    }                                                                    \
    CHECK_MESSAGE(thrown_, "expected " << lmf::to_string(expected));     \
  } while (0)
