#ifndef AES_H
#define AES_H

#include <stdint.h>

#define AES_BLOCK_SIZE 16
#define AES128_KEY_SIZE 16
#define AES128_ROUNDS 10

typedef struct {
    uint8_t round_keys[(AES128_ROUNDS + 1) * AES_BLOCK_SIZE];
} AES_CTX;

void aes128_init(AES_CTX *ctx, const uint8_t key[AES128_KEY_SIZE]);
void aes128_encrypt_block(const AES_CTX *ctx, uint8_t block[AES_BLOCK_SIZE]);
void aes128_decrypt_block(const AES_CTX *ctx, uint8_t block[AES_BLOCK_SIZE]);

#endif
