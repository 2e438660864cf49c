#include "densitrace/errors.hpp"

#include <gtest/gtest.h>

using namespace densitrace;

TEST(Errors, MessageCarriesKindAndDetail) {
    try {
        fail(ErrorKind::MissingTensor, "layers.0.attn.wq");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::MissingTensor);
        EXPECT_STREQ(e.what(), "MissingTensor: layers.0.attn.wq");
    }
}
