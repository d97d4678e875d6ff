#include <string.h>
#include "sha1.h"

#define rol(v, b) (((v) << (b)) | ((v) >> (32 - (b))))

static uint32_t load_be32(const uint8_t *p)
{
    return ((uint32_t)p[0] << 24) | ((uint32_t)p[1] << 16) |
           ((uint32_t)p[2] << 8) | (uint32_t)p[3];
}

void SHA1Transform(uint32_t state[5], const uint8_t buffer[SHA1_BLOCK_LENGTH])
{
    uint32_t w[80];
    uint32_t a, b, c, d, e, f, k, t;
    int i;

    for (i = 0; i < 16; i++)
        w[i] = load_be32(buffer + 4 * i);
    for (i = 16; i < 80; i++)
        w[i] = rol(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);

    a = state[0];
    b = state[1];
    c = state[2];
    d = state[3];
    e = state[4];
    for (i = 0; i < 80; i++) {
        if (i < 20) {
            f = (b & c) | (~b & d);
            k = 0x5A827999;
        } else if (i < 40) {
            f = b ^ c ^ d;
            k = 0x6ED9EBA1;
        } else if (i < 60) {
            f = (b & c) | (b & d) | (c & d);
            k = 0x8F1BBCDC;
        } else {
            f = b ^ c ^ d;
            k = 0xCA62C1D6;
        }
        t = rol(a, 5) + f + e + k + w[i];
        e = d;
        d = c;
        c = rol(b, 30);
        b = a;
        a = t;
    }
    state[0] += a;
    state[1] += b;
    state[2] += c;
    state[3] += d;
    state[4] += e;
}

void SHA1Init(SHA1_CTX *context)
{
    context->count = 0;
    context->state[0] = 0x67452301;
    context->state[1] = 0xEFCDAB89;
    context->state[2] = 0x98BADCFE;
    context->state[3] = 0x10325476;
    context->state[4] = 0xC3D2E1F0;
}

void SHA1Update(SHA1_CTX *context, const uint8_t *data, size_t len)
{
    size_t used = (size_t)((context->count >> 3) & 63);
    size_t i = 0;

    context->count += (uint64_t)len << 3;
    if (used + len >= SHA1_BLOCK_LENGTH) {
        i = SHA1_BLOCK_LENGTH - used;
        memcpy(context->buffer + used, data, i);
        SHA1Transform(context->state, context->buffer);
        for (; i + 63 < len; i += 64)
            SHA1Transform(context->state, data + i);
        used = 0;
    }
    memcpy(context->buffer + used, data + i, len - i);
}

void SHA1Final(uint8_t digest[SHA1_DIGEST_LENGTH], SHA1_CTX *context)
{
    uint8_t length[8];
    uint8_t pad = 0x80;
    uint8_t zero = 0;
    int i;

    for (i = 0; i < 8; i++)
        length[i] = (uint8_t)(context->count >> (56 - 8 * i));
    SHA1Update(context, &pad, 1);
    while ((context->count & 504) != 448)
        SHA1Update(context, &zero, 1);
    SHA1Update(context, length, 8);
    for (i = 0; i < SHA1_DIGEST_LENGTH; i++)
        digest[i] = (uint8_t)(context->state[i >> 2] >> (24 - 8 * (i & 3)));
}
