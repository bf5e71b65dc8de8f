/* Dump codeword components, one row per codebook entry. */

int32 gc_compute_closest_cw(FILE *fp, gauden_t *gs)
{
    int32 codeid;
    int32 cid;
    for (codeid = 0; codeid < gs->n_code; codeid++) {
        fprintf(fp, "%d", codeid);
        for (cid = 0; cid < gs->n_featlen; cid++)
            fprintf(fp, " %d", gs->codeword[codeid][cid]);
    }
    return 0;
}
